"""
Data models for the Gaze-Guided Generation Service
"""
