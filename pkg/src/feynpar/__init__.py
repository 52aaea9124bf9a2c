"""feynpar: computational companion for parametric Feynman integrals.

Modules:
    graphs           Feynman graph combinatorics
    poly             exact sparse multivariate polynomials
    groebner         Groebner/standard bases, quotient dimensions
    points           finite-field point counting
    graph_poly       Kirchhoff/Symanzik polynomials and case tables
    series           truncated Laurent series
    hopf             Hopf algebra, Birkhoff/BPHZ, flat-connection data
    slicing          linear slices, singular points, Milnor numbers
    quadrature       adaptive simplex quadrature and sublevel integrals
    forms            polynomial differential forms on affine chains
    integrals        Feynman integrals, DimReg series, Gelfand-Leray, Mellin, Leray
    cli              command-line entry point
"""

__version__ = "0.1.0"
