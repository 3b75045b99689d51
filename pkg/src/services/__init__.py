"""Service layer: evaluation and report output"""
