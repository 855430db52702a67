# Intervals, expressions and the infix parser
