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

# Estimation methods
METHOD_MLE = 'mle'
METHOD_FIRTH = 'firth'
METHOD_MEDIAN = 'median-br'
METHOD_MEDIAN_PROFILE = 'median-br-profile'
METHODS = (METHOD_MLE, METHOD_FIRTH, METHOD_MEDIAN, METHOD_MEDIAN_PROFILE)

# Short names accepted by the console
METHOD_ALIASES = {
    'mle': METHOD_MLE,
    'firth': METHOD_FIRTH,
    'br': METHOD_FIRTH,
    'mbr': METHOD_MEDIAN,
    'median-br': METHOD_MEDIAN,
    'mbr-profile': METHOD_MEDIAN_PROFILE,
    'median-br-profile': METHOD_MEDIAN_PROFILE,
}

# Methods whose score-type intervals are defined
SCORE_INTERVAL_METHODS = (METHOD_MLE, METHOD_MEDIAN, METHOD_MEDIAN_PROFILE)

# Link functions
LINK_LOGIT = 'logit'
LINK_PROBIT = 'probit'
LINK_CLOGLOG = 'cloglog'
LINK_LOG = 'log'

# Interval kinds
INTERVAL_WALD = 'wald'
INTERVAL_SCORE = 'score'

# Exit statuses of the console
EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NONCONVERGENCE = 2

# Column order of the simulation tables
TABLE_COLUMNS = ('PU', 'MAE', 'B', 'RMSE', 'Wald', 'Score')

# Number of consecutive log-likelihood increases that confirm a divergent path
DIVERGENCE_WINDOW = 5

# Steps of the outward search for score interval endpoints
SCORE_BRACKET_STEPS = 20

# Smallest direction component the separation check treats as nonzero
SEPARATION_TOL = 1e-7
