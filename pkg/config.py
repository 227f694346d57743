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

import os

from utils import env, strtobool

# Application Name
#
# This value is the name of the engine, it is placed in the reports emitted by
# the command line and in the log records.
NAME = env('MEDSCORE_NAME', 'medscore')

# Logging Level
#
# Level of the root handler configured by the console. Solvers log their
# iteration trace at DEBUG and convergence outcomes at INFO.
LOG_LEVEL = env('MEDSCORE_LOG_LEVEL', 'WARNING').upper()

# Debug Mode
#
# When enabled, the console re-raises unexpected exceptions with the full
# stack trace instead of mapping them to an exit status.
DEBUG = strtobool(env('MEDSCORE_DEBUG', 'False'))

# Worker Threads
#
# Upper bound on the number of worker processes used by the simulation
# harness. Results are identical for any value, only the wall time changes.
THREADS = max(1, int(env('MEDSCORE_THREADS', 1)))

# Default Seed
#
# Every source of randomness is seeded, this is the seed used when the console
# is invoked without --seed.
SEED = int(env('MEDSCORE_SEED', 0))

# Quadrature
#
# Tolerances of the adaptive quadrature over the real line used by the skew
# normal model. The defaults have been validated for |theta| <= 30.
QUADRATURE = {
    'ABS_TOL': float(env('MEDSCORE_QUAD_ABS', 1e-10)),
    'REL_TOL': float(env('MEDSCORE_QUAD_REL', 1e-10)),
    'LIMIT': int(env('MEDSCORE_QUAD_LIMIT', 200)),
}

# Fisher Scoring
#
# Defaults of the modified Fisher scoring iteration.
#   - MAX_ITER : maximum number of iterations
#   - TOL : tolerance on the scaled adjusted score (infinity norm)
#   - HALVINGS : maximum number of step halvings per iteration
#   - DIVERGENCE : infinity norm after which a monotone MLE path is declared
#     divergent (infinite estimate)
#   - MAX_STEP : largest change of any component in a single iteration
FIT = {
    'MAX_ITER': int(env('MEDSCORE_MAX_ITER', 100)),
    'TOL': float(env('MEDSCORE_TOL', 1e-8)),
    'HALVINGS': int(env('MEDSCORE_HALVINGS', 10)),
    'DIVERGENCE': float(env('MEDSCORE_DIVERGENCE', 50.0)),
    'MAX_STEP': float(env('MEDSCORE_MAX_STEP', 5.0)),
}

# Exact Enumeration
#
# Largest sample space the exact oracle agrees to enumerate.
EXACT_MAX_SUPPORT = int(env('MEDSCORE_EXACT_MAX_SUPPORT', 10_000_000))

# Bundled Datasets
#
# Directory holding the datasets addressable from the console as @name.
DATA_DIR = env('MEDSCORE_DATA_DIR', os.path.join(
    os.path.split(os.path.abspath(__file__))[0],
    'medscore',
    'datasets'
))
