# Analysis stages: Hessian, alpha, underestimator, bound, verification
