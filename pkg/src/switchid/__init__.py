"""Realization theory and persistence of excitation for linear switched systems."""

from .hankel import HankelSubMatrix, build_hankel, hankel_rank
from .lss import (DimensionError, HybridWord, SwitchedLinearSystem, Trajectory,
                  check_l1_stability_sufficient, check_reversible, io_map,
                  matrix_product_along_word, probe_word, simulate)
from .markov import (CombinedMarkov, MarkovSource, ModelMarkovSource,
                     OracleMarkovSource, TabulatedMarkovSource, combined_markov,
                     gcr_evaluate, markov_distance, markov_from_model,
                     markov_from_oracle)
from .pe_estimation import (ConfigError, ConvergenceReport, EmpiricalEstimate,
                            EstimateReport, NotIdentifiableError, PeCheckReport,
                            PeSignalConfig, StateCorrelationReport, ZeroSampleError,
                            check_pe_conditions, empirical_mode_freq,
                            estimate_all_markov, estimate_markov, generate_pe_input,
                            identify, state_correlation_check)
from .pe_inputs import (IncompleteDataError, InverseMap, NoZeroingInputError,
                        PersistentInput, ProbeWord, build_pe_input_map_based,
                        build_pe_input_model_based, elementwise_inverse_word,
                        enumerate_probe_set, extract_markov_from_response,
                        find_zeroing_input, paired_extension, paired_inverse_map)
from .realization import (DegenerateSystemError, RankFactorization,
                          RealizationResult, is_minimal, observability_rank,
                          pseudoinverse, rank_factorize, realize,
                          shift_column_selector, span_reachability_rank)
from .words import (InvalidWordError, ModeWord, as_mode_word, count_words_up_to,
                    index_of_word, subword, word_at_index, words_up_to)

__version__ = "0.1.0"
