"""
Test suite for Dealership RAG system.
"""

