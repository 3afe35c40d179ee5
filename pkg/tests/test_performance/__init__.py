"""Performance test initialization"""
