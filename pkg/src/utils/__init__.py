"""Utility modules for ruij-lab"""
