################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
from typing import Any, Dict

import numpy as np

from ..baselearners import ModelFormula, learner_from_dict, to_dict
from ..errors import ConfigurationError
from ..typing import DumpTarget, LoadSource
from ..utils import load_json, save_generic_dict
from ._engine import HistoryEntry
from ._model import FittedModel

MODEL_SCHEMA_VERSION = 1


def convert_model_to_dict(model: FittedModel) -> Dict[str, Any]:
    """JSON-compatible document of a fitted model.

    Training designs and the training predictor are not stored; a loaded model
    rebuilds designs from the stored encoders.
    """
    return {
        "schema_version": MODEL_SCHEMA_VERSION,
        "formula": model.formula.to_dict(),
        "offset": model.offset,
        "m_stop": model.m_stop,
        "nu": model.nu,
        "centers": dict(model.centers),
        "ranges": {name: list(bounds) for name, bounds in model.ranges.items()},
        "risk": np.asarray(model.risk, dtype=float).tolist(),
        "history": [entry.learner_id for entry in model.history],
        "history_rss": [entry.weighted_rss for entry in model.history],
        "learners": [
            {
                **to_dict(learner),
                "coefficients": np.asarray(
                    model.coefficients[learner.learner_id], dtype=float
                ).tolist(),
            }
            for learner in model.learners
        ],
    }


def convert_dict_to_model(dictionary: Dict[str, Any]) -> FittedModel:
    version = dictionary.get("schema_version")
    if version != MODEL_SCHEMA_VERSION:
        raise ConfigurationError(
            f"Unsupported model document version {version}, expected "
            f"{MODEL_SCHEMA_VERSION}."
        )
    learners = tuple(learner_from_dict(record) for record in dictionary["learners"])
    coefficients = {
        record["id"]: np.array(record["coefficients"], dtype=float)
        for record in dictionary["learners"]
    }
    history = tuple(
        HistoryEntry(iteration + 1, learner_id, float(rss))
        for iteration, (learner_id, rss) in enumerate(
            zip(dictionary["history"], dictionary["history_rss"])
        )
    )
    return FittedModel(
        formula=ModelFormula.from_dict(dictionary["formula"]),
        learners=learners,
        coefficients=coefficients,
        offset=float(dictionary["offset"]),
        m_stop=int(dictionary["m_stop"]),
        nu=float(dictionary["nu"]),
        centers={name: float(value) for name, value in dictionary["centers"].items()},
        ranges={
            name: (float(bounds[0]), float(bounds[1]))
            for name, bounds in dictionary["ranges"].items()
        },
        risk=np.array(dictionary["risk"], dtype=float),
        history=history,
    )


def save_model(model: FittedModel, filename: DumpTarget) -> None:
    """Save a fitted model to a JSON file.

    Args:
        model: the model to be saved
        filename: the name of the file, or a writable file-like object
    """
    save_generic_dict(convert_model_to_dict(model), filename)


def load_model(file: LoadSource) -> FittedModel:
    """Load a model saved with `save_model`.

    Args:
        file: the name of the file, or a file-like object.
    """
    return convert_dict_to_model(load_json(file))
