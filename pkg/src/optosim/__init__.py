"""Simulation toolkit for vapor-cloud-limited optoacoustic air-to-water links."""

__version__ = "0.1.0"

from .channel import (ChannelParams, SourceLevelTable, ambient_noise_level,
                      slot_detection_probs, slot_snr, thorp_absorption,
                      transmission_loss)
from .cloud import (CloudParams, CloudState, EmissionTrace, gate_stream,
                    max_sustainable_rate, required_padding, simulate_train,
                    step)
from .codec import (MappingTable, Scheme, SchemeSpec, SlotStream,
                    build_mapping, decode_stream, encode_symbol, encode_text,
                    encode_values, mapping_from_text)
from .linksim import (BerResult, ExperimentConfig, ThroughputResult,
                      calibrate_threshold, run_ber, run_text_sim)
from .rates import (LaserParams, bit_rate, empirical_pulse_ratio,
                    max_allowed_rate, power_efficiency_vs_ook, rate_sweep)
