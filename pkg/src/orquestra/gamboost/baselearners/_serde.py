################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
from functools import singledispatch
from typing import Any, Mapping, Optional

from ..basis import KnotGrid, PenaltyMatrix
from ..errors import ConfigurationError
from ..utils import convert_array_to_dict, convert_dict_to_array
from . import _encoders, _learner

# ---------- serialization ----------


@singledispatch
def to_dict(obj):
    raise NotImplementedError(f"Serialization isn't implemented for {type(obj)}")


def _modifier_to_dict(modifier: Optional[_encoders.Modifier]):
    if modifier is None:
        return {}
    return {
        "modifier": {
            "column": modifier.column,
            "levels": list(modifier.levels),
            "level": modifier.level,
        }
    }


@to_dict.register
def _penalty_to_dict(penalty: PenaltyMatrix):
    return {"order": penalty.order, "matrix": convert_array_to_dict(penalty.matrix)}


@to_dict.register
def _intercept_to_dict(encoder: _encoders.InterceptEncoder):
    return {"type": "intercept"}


@to_dict.register
def _dummy_to_dict(encoder: _encoders.DummyEncoder):
    return {
        "type": "dummy",
        "column": encoder.column,
        "levels": list(encoder.levels),
        "reference": encoder.reference,
    }


@to_dict.register
def _random_intercept_to_dict(encoder: _encoders.RandomInterceptEncoder):
    return {
        "type": "random_intercept",
        "column": encoder.column,
        "levels": list(encoder.levels),
    }


@to_dict.register
def _linear_to_dict(encoder: _encoders.LinearEncoder):
    return {
        "type": "linear",
        "column": encoder.column,
        "center": encoder.center,
        **_modifier_to_dict(encoder.modifier),
    }


@to_dict.register
def _nonlinear_to_dict(encoder: _encoders.NonlinearEncoder):
    return {
        "type": "nonlinear",
        "column": encoder.column,
        "grid": encoder.grid.to_dict(),
        "transform": convert_array_to_dict(encoder.transform),
        "projection": convert_array_to_dict(encoder.projection),
        "center": encoder.center,
        **_modifier_to_dict(encoder.modifier),
    }


@to_dict.register
def _tensor_to_dict(encoder: _encoders.TensorEncoder):
    return {
        "type": "tensor",
        "columns": [encoder.first, encoder.second],
        "grids": [grid.to_dict() for grid in encoder.grids],
        "column_means": convert_array_to_dict(encoder.column_means),
    }


@to_dict.register
def _learner_to_dict(learner: _learner.BaseLearner):
    """
    Returns:
        A mapping with keys:
            - "id", "kind", "term_id", "term_label"
            - "lambda" and, for calibrated learners, "df"
            - "penalty"
            - "encoder"
    The training design is not stored.
    """
    return {
        "id": learner.learner_id,
        "kind": learner.kind.value,
        "term_id": learner.term_id,
        "term_label": learner.term_label,
        "lambda": learner.lam,
        **({"df": learner.df_target} if learner.df_target is not None else {}),
        "penalty": to_dict(learner.penalty),
        "encoder": to_dict(learner.encoder),
    }


# ---------- deserialization ----------


def _modifier_from_dict(dict_) -> Optional[_encoders.Modifier]:
    if "modifier" not in dict_:
        return None
    modifier = dict_["modifier"]
    return _encoders.Modifier(
        modifier["column"], tuple(modifier["levels"]), modifier["level"]
    )


def penalty_from_dict(dict_: Mapping[str, Any]) -> PenaltyMatrix:
    return PenaltyMatrix(int(dict_["order"]), convert_dict_to_array(dict_["matrix"]))


def encoder_from_dict(dict_: Mapping[str, Any]) -> _encoders.DesignEncoder:
    kind = dict_.get("type")
    if kind == "intercept":
        return _encoders.InterceptEncoder()
    if kind == "dummy":
        return _encoders.DummyEncoder(
            dict_["column"], tuple(dict_["levels"]), dict_["reference"]
        )
    if kind == "random_intercept":
        return _encoders.RandomInterceptEncoder(dict_["column"], tuple(dict_["levels"]))
    if kind == "linear":
        return _encoders.LinearEncoder(
            dict_["column"], float(dict_["center"]), _modifier_from_dict(dict_)
        )
    if kind == "nonlinear":
        return _encoders.NonlinearEncoder(
            dict_["column"],
            KnotGrid.from_dict(dict_["grid"]),
            convert_dict_to_array(dict_["transform"]),
            convert_dict_to_array(dict_["projection"]),
            float(dict_["center"]),
            _modifier_from_dict(dict_),
        )
    if kind == "tensor":
        first, second = dict_["columns"]
        grids = tuple(KnotGrid.from_dict(grid) for grid in dict_["grids"])
        return _encoders.TensorEncoder(
            first, second, grids, convert_dict_to_array(dict_["column_means"])
        )
    raise ConfigurationError(f"Unknown encoder type '{kind}'.")


def learner_from_dict(dict_: Mapping[str, Any]) -> _learner.BaseLearner:
    """Restore a learner saved with `to_dict`. It has no training design."""
    try:
        return _learner.BaseLearner(
            learner_id=dict_["id"],
            kind=_learner.LearnerKind(dict_["kind"]),
            penalty=penalty_from_dict(dict_["penalty"]),
            encoder=encoder_from_dict(dict_["encoder"]),
            lam=float(dict_["lambda"]),
            df_target=dict_.get("df"),
            term_id=dict_.get("term_id", ""),
            term_label=dict_.get("term_label", ""),
        )
    except (KeyError, ValueError) as error:
        if isinstance(error, ConfigurationError):
            raise
        raise ConfigurationError(
            f"Invalid learner record '{dict_.get('id', '?')}'."
        ) from error
