"""
CRFVE Edge Schwarz - Problem Setup
==================================

Bundles mesh, dofs, control volumes, partition, coefficient and the
assembled system of one (n, m) instance.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, Optional


from .assembly import AssembledSystem, Source, assemble_system
from .coefficient import (CoefficientField, make_oscillatory_coefficient, make_piecewise_constant,
                          red_multipliers)
from .errors import InvalidParameterError
from .mesh import (DofMap, DualMesh, Partition, TriMesh, build_control_volumes,
                   build_partition, build_structured_mesh, enumerate_cr_dofs)

logger = logging.getLogger(__name__)


@dataclass
class Problem:
    mesh: TriMesh
    dofmap: DofMap
    dual: DualMesh
    partition: Partition
    coeff: CoefficientField
    system: AssembledSystem

    @property
    def n(self) -> int:
        return self.mesh.n

    @property
    def m(self) -> int:
        return self.partition.m


def make_coefficient(n_subdomains: int, freq: int = 0, alpha1: float = 1.0,
                     red_mask: Iterable[int] = ()) -> CoefficientField:
    """
    Sinusoidal test coefficient for freq > 0, otherwise the subdomain-wise
    constant field with multiplier alpha1 on the red subdomains.
    """
    if freq:
        return make_oscillatory_coefficient(freq, alpha1, red_mask, n_subdomains)
    return make_piecewise_constant(red_multipliers(alpha1, red_mask, n_subdomains))


def build_problem(n: int, m: int, coeff: Optional[CoefficientField] = None, *,
                  freq: int = 0, alpha1: float = 1.0, red_mask: Iterable[int] = (),
                  f: Source = 1.0, diag: str = "ne") -> Problem:
    """
    Mesh, partition and assemble one instance.

    Args:
        n: Fine blocks per side (h = 1/n)
        m: Subdomains per side (H = 1/m), must divide n
        coeff: Coefficient field; built from freq/alpha1/red_mask when omitted

    Example:
        >>> p = build_problem(4, 2)
        >>> p.system.A_FE.shape
        (40, 40)
    """
    mesh = build_structured_mesh(n, diag)
    partition = build_partition(mesh, m)
    dofmap = enumerate_cr_dofs(mesh)
    dual = build_control_volumes(mesh)
    if coeff is None:
        coeff = make_coefficient(partition.n_subdomains, freq, alpha1, red_mask)
    if coeff.multipliers.size != partition.n_subdomains:
        raise InvalidParameterError(
            f"coefficient has {coeff.multipliers.size} multipliers, partition {partition.n_subdomains} subdomains")
    system = assemble_system(mesh, dofmap, dual, partition, coeff, f)
    logger.info("problem n=%d m=%d: %d free dofs", n, m, dofmap.n_free)
    return Problem(mesh=mesh, dofmap=dofmap, dual=dual, partition=partition,
                   coeff=coeff, system=system)
