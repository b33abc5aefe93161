"""Exact symbolic engine for symplectic connections on superdomains."""
