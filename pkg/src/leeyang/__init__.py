"""Lee-Yang zeros of the long-range Ising model via probe-spin coherence."""

from .coherence import (CoherenceTrace, coherence_at, coherence_sensitivity,
                        coherence_trace)
from .experiment import (EnsembleWeights, MeasuredTrace, NoiseModel, ensemble_weights,
                         extract_degenerate_zero, extract_zeros, synthesize_measurement,
                         zero_uncertainty)
from .ising import (IsingParams, PartitionPolynomial, SaddlePointResult,
                    brute_force_partition, build_polynomial, critical_temperature,
                    degeneracy, partition_direct, saddle_point)
from .thermo import (EdgeCurve, FreeEnergyResult, edge_scan, estimate_tc,
                     free_energy_direct, free_energy_from_zeros)
from .zeros import (ZeroCountError, ZeroSet, find_zeros_polynomial, find_zeros_real,
                    first_zero, verify_circle_theorem)

__version__ = "0.1.0"
