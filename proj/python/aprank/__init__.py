# Copyright 2026 The aprank Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Matrix factorization ranked with BPR and adversarial personalized ranking."""

from aprank._core import (
    AprConfig,
    DataError,
    Dataset,
    DimensionError,
    FormatError,
    Model,
    NumericalError,
    Optimizer,
    Split,
    TrainConfig,
    TrainResult,
    evaluate,
    ingest,
    paired_significance,
    probe,
    read_split,
    split_leave_one_out,
    synthetic,
    train_apr,
    train_bpr,
    write_split,
)

__all__ = [
    "AprConfig",
    "DataError",
    "Dataset",
    "DimensionError",
    "FormatError",
    "Model",
    "NumericalError",
    "Optimizer",
    "Split",
    "TrainConfig",
    "TrainResult",
    "evaluate",
    "ingest",
    "paired_significance",
    "probe",
    "read_split",
    "split_leave_one_out",
    "synthetic",
    "train_apr",
    "train_bpr",
    "write_split",
]
