from .denoise import (
    DenoiseProblem,
    denoise_bounds,
    denoise_grad,
    denoise_value,
    divergence,
    gen_denoise,
    grad_image,
    huber,
    huber_deriv,
    phantom,
    read_pgm,
    write_pgm,
)
from .logistic import (
    LogisticProblem,
    gen_logistic,
    logistic_bounds,
    logistic_grad,
    logistic_hvp,
    logistic_value,
)
from .quadratic import (
    QuadraticProblem,
    SpectrumSpec,
    dense_quadratic,
    gen_spectrum,
    quadratic_from_spectrum,
    theorem24_L,
)
from .reference import reference_solve
