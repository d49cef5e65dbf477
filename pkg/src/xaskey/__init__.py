"""Exceptional Askey-scheme polynomials via Darboux-Crum transformations."""
