# Copyright 2020 The Medscore Authors
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

"""
medscore solves median bias-reduced score equations for parametric models,
together with maximum likelihood and Firth's bias reduction as comparators,
an exact enumeration oracle and a Monte Carlo harness.
"""

import logging

import config

# Only the uppercase names of the config module are settings
CONFIG = {key: getattr(config, key) for key in dir(config) if key.isupper()}

logging.getLogger(__name__).addHandler(logging.NullHandler())
