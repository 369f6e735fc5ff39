"""Testing package initialization"""
