"""Desk-scale toolkit for multidimensional shifts of finite type."""

from .geometry import (Box, DimensionMismatch, ball, canonical_shape, cube,
                       diameter, hypercube, inflate, inner_boundary,
                       linf_distance, minkowski, set_distance, translate)
from .patterns import (Alphabet, Pattern, concat, constant,
                       equal_up_to_translation, find_occurrences,
                       iter_assignments, lex_rank, proper_subpatterns,
                       unrank_pattern)
from .sft import (Budget, BudgetExceeded, SftSpec, admissibility_witness,
                  count_language, entropy_estimate, enumerate_language,
                  extend_pattern, fixed_point_symbols, forbid, full_shift,
                  is_locally_admissible, iter_language)
from .mixing import (PropertyReport, REFUTED, REFUTED_AT_BOUND, SUFFICIENT,
                     VERIFIED, check_block_gluing, check_g_extension,
                     check_safe_symbol, check_ssf, fep_implies_block_gluing,
                     first_offenders, in_language_bounded, involution_sft,
                     rectangles_up_to, subshapes_of_cube)
from .conjugacy import (CodeError, SlidingBlockCode, apply_code,
                        transport_forbidden, verify_transport)
from .factor import (DeterminedZoneLayout, LayoutError, MarkerParams,
                     PsiCodec, StageFillError, StageTrace,
                     SurjectivityHarness, build_marker,
                     check_marker_non_overlap, compute_islands, detect_frames,
                     prepare_fill, psi_decode, psi_encode, psi_encode_pattern,
                     run_staged_fill, stage_region, staged_regions_general,
                     surjectivity_harness, verify_factor_window)
