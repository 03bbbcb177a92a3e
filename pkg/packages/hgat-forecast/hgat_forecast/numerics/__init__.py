from hgat_forecast.numerics.params import ParameterStore
from hgat_forecast.numerics.tensor import (
    Tape,
    Tensor,
    as_tensor,
    current_tape,
    default_dtype,
    get_default_dtype,
    set_default_dtype,
    tensor,
)
