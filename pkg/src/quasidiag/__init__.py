"""Toolkit for quantitative quasidiagonality experiments on discrete groups:
commutator norms against truncated regular representations, paradoxical
certificates, induced representations of finite groups, and finite-quotient
witness pipelines."""

from .cayley import BallIndex, ball, f2_ball, f2_sphere, first_letter_partition, sphere
from .groups import (AbelsElement, CongruenceQuotient, FiniteGroup, FreeWord,
                     HeisenbergElement, PAdicLaurent, center_membership,
                     cyclic_group, free_word, heisenberg_mod, verify_group_axioms)
from .finrep import (CentralCharacter, MonomialMatrix, UnitaryRep,
                     check_induced_restriction, check_induced_separation,
                     cyclic_character, direct_sum, induce_central,
                     monomial_norm_minus_identity, regular_rep)
from .modulus import (AuditRecord, ParadoxicalCertificate, SphereVector,
                      audit_lower_bound, cf_lower_bound, cf_upper_search,
                      commutator_closed_form, f2_standard_certificate,
                      pairing_closed_form, pairing_numeric,
                      rank_one_commutator_norm, sphere_vector,
                      trace_lemma_check, verify_certificate)
from .regrep import (FiniteProjection, SparseOperator, TruncatedRep,
                     build_f2_rep, build_truncated_rep, commutator_norm, op_norm)
from .witnesses import (LEFWitness, MFRun, choose_gamma, get_instance,
                        lef_to_unitaries, lef_witness_search, run_mf,
                        separation_report, verify_lef_witness)

__version__ = "0.1.0"
