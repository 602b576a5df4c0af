"""Private geometric-median estimators and their building blocks."""
