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

import pytest

from .. import cavity
from ..perturbation import MembraneConfig

LENGTH = 6.313e-2
RADIUS = 5.0e-2
THICKNESS = 39.0e-9
INDEX = 2.0


@pytest.fixture
def geometry():
    return cavity.CavityGeometry(length=LENGTH, mirror_radius=RADIUS)


@pytest.fixture
def membrane():
    return MembraneConfig(thickness=THICKNESS, index=INDEX)


@pytest.fixture
def triplet_basis(geometry):
    """Singlet TEM00 and the second-order triplet one FSR below."""
    return cavity.enumerate_basis(geometry, (0, 0), max_order=2,
                                  window=0.5e9)
