"""
Core contracts and exceptions
"""
