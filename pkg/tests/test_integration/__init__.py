"""Integration test initialization"""
