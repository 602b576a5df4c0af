"""Privacy budgets, conversions, noise samplers and the sparse vector routine."""
