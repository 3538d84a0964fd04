# Copyright 2026 The msra2d Authors. All Rights Reserved.
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
# ==============================================================================
"""Two-dimensional multi-sequence CTC lattice, decoding and set metrics."""

from msra2d._msra2d import (
    Error,
    InfeasibleTarget,
    InvalidInput,
    decode,
    evaluate_sets,
    grad_wrt_logits,
    grad_wrt_probs,
    match_sets,
    oracle_check,
    sequence_log_prob,
    set_loss,
)

__all__ = [
    "Error",
    "InfeasibleTarget",
    "InvalidInput",
    "decode",
    "evaluate_sets",
    "grad_wrt_logits",
    "grad_wrt_probs",
    "match_sets",
    "oracle_check",
    "sequence_log_prob",
    "set_loss",
]
