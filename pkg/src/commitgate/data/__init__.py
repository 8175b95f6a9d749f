"""Shipped default data files (denylists, offensive lexicon)."""
