"""Unit Tests __init__"""
