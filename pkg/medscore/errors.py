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
The module holds the errors raised by the engine, the console maps them to
its exit statuses.
"""


class MedscoreError(Exception):
    pass


class DomainError(MedscoreError, ValueError):
    """Parameter (or argument) outside the domain of a model or function."""

    def __init__(self, message, component=None):
        super().__init__(message)
        self.component = component


class SingularInformationError(MedscoreError, ArithmeticError):
    """Information (or nuisance block) not positive definite."""

    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class BracketError(MedscoreError):
    """No sign change found, the last bracket tried is kept."""

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class IntegrationError(MedscoreError):
    def __init__(self, message, integrand=None):
        super().__init__(message)
        self.integrand = integrand


class SupportOverflowError(MedscoreError):
    pass


class InputError(MedscoreError, ValueError):
    """Malformed user input, with the offending line or field when known."""

    def __init__(self, message, line=None, field=None):
        super().__init__(message)
        self.line = line
        self.field = field


class ConvergenceWarning(UserWarning):
    pass


class FinitenessWarning(UserWarning):
    pass
