"""
Tests for lyapcert
"""
