# All Rights Reserved.
#
#    Licensed under the Apache License, Version 2.0 (the "License"); you may
#    not use this file except in compliance with the License. You may obtain
#    a copy of the License at
#
#         http://www.apache.org/licenses/LICENSE-2.0
#
#    Unless required by applicable law or agreed to in writing, software
#    distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
#    WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
#    License for the specific language governing permissions and limitations
#    under the License.

"""CODATA 2018 physical constants, SI units, 12 significant digits."""

import math

SPEED_OF_LIGHT = 299792458.000
PLANCK_REDUCED = 1.05457181765e-34
BOLTZMANN = 1.38064900000e-23

TWO_PI = 2.0 * math.pi

NANOMETER = 1.0e-9
