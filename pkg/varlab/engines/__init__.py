# Numerical engines: grid model, variation functionals, weight sequences,
# quadrature, Fourier partial sums and the divergence construction.
