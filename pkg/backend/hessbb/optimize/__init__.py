# Box-constrained convex minimization
