"""
Test suite for contact-complexity.
"""
