# Copyright 2026 The ANRS Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Python bindings for the ANRS news recommender."""

from anrs._core import (
    CompatibilityError,
    Config,
    InputError,
    NumericalError,
    ShapeError,
    auc,
    click_probability,
    kmeans,
    load_checkpoint,
    mrr,
    ndcg,
    orthogonality_penalty,
    preprocess,
    run_cli,
    run_synthetic,
    summarize,
    train,
    write_synthetic,
)

__all__ = [
    "CompatibilityError",
    "Config",
    "InputError",
    "NumericalError",
    "ShapeError",
    "auc",
    "click_probability",
    "kmeans",
    "load_checkpoint",
    "mrr",
    "ndcg",
    "orthogonality_penalty",
    "preprocess",
    "run_cli",
    "run_synthetic",
    "summarize",
    "train",
    "write_synthetic",
]
