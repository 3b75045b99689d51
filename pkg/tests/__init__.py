"""Test suite for ruij-lab"""
