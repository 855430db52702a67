# Range enclosures and interval automatic differentiation
