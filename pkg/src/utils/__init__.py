"""Utility modules for application runtime."""
