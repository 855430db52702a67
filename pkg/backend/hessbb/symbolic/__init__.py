# Symbolic differentiation and simplification
