"""Geometric-median objective, oracle and projection primitives."""
