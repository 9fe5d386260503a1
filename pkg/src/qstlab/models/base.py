"""
Base Models

Common pydantic configuration for every qstlab value type, plus helpers for
models that carry numpy arrays.
"""

from typing import Any

import numpy as np
from pydantic import BaseModel as PydanticBaseModel
from pydantic import ConfigDict


class BaseModel(PydanticBaseModel):
    """
    Base model with common configuration.

    Features:
    - Immutable after construction (safe to share across threads)
    - Extra fields forbidden
    - numpy arrays allowed as field types
    """

    model_config = ConfigDict(
        frozen=True,
        extra="forbid",
        arbitrary_types_allowed=True,
        use_enum_values=False,
    )


def frozen_array(value: Any, dtype: Any) -> np.ndarray:
    """Copy ``value`` into a read-only numpy array of ``dtype``."""
    array = np.array(value, dtype=dtype, copy=True)
    array.flags.writeable = False
    return array


def complex_parts(values: np.ndarray) -> dict:
    """Split a complex array into JSON-friendly real and imaginary lists."""
    flat = np.asarray(values, dtype=np.complex128)
    return {"re": flat.real.tolist(), "im": flat.imag.tolist()}
