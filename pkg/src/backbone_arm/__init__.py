"""Connectivity-preserving relay backbones planned as a virtual serial arm."""
