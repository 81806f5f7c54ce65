"""Python bindings for the hanjakit C++ library."""

import json
import os

from ._hanjakit import (
    HanjakitError,
    apply_labels,
    build_prompt,
    chunk,
    decode_iob2,
    encode_iob2,
    labels,
    parse_cedict,
    split_characters,
    strip_punctuation,
)

__all__ = [
    "HanjakitError",
    "Pipeline",
    "apply_labels",
    "build_prompt",
    "chunk",
    "decode_iob2",
    "encode_iob2",
    "labels",
    "parse_cedict",
    "split_characters",
    "strip_punctuation",
]


class Pipeline:
    """Punctuation, NER, translation and glossary over one configuration.

    config_path defaults to $HANJAKIT_CONFIG.
    """

    def __init__(self, config_path=None):
        from ._hanjakit import _Pipeline

        path = config_path or os.environ.get("HANJAKIT_CONFIG")
        if not path:
            raise ValueError("no config_path given and HANJAKIT_CONFIG is unset")
        self._impl = _Pipeline(os.fspath(path))

    @property
    def backends(self):
        return self._impl.backends()

    def punctuate(self, text, mode="Comprehensive", backend=None):
        return json.loads(self._impl.punctuate(text, mode, backend))

    def ner(self, text, backend=None):
        return json.loads(self._impl.ner(text, backend))

    def translate(self, text, target="Korean", on_delta=None, backend=None):
        return self._impl.translate(text, target, on_delta, backend)

    def glossary(self, text):
        return json.loads(self._impl.glossary(text))

    def batch(self, inputs, output_dir, tasks=("punctuate", "ner", "translate"),
              mode="Comprehensive", targets=("Korean",), jobs=0):
        inputs = [os.fspath(p) for p in inputs]
        return json.loads(self._impl.batch(inputs, list(tasks), os.fspath(output_dir),
                                           mode, list(targets), jobs))
