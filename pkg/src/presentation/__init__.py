"""
Presentation layer initialization.
"""