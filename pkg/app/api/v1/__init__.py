"""
API v1 endpoints for the Gaze-Guided Generation Service
"""
