"""Real-time score follower: GP spectral-mixture likelihoods over a
duration-aware left-to-right decoder."""

from ._core import (
    Audioframe,
    CholeskyFactor,
    ConfigError,
    Decoder,
    DecoderConfig,
    EnvelopeFit,
    FrameSpec,
    HarmonicPeak,
    HumSettings,
    InharmonicityFit,
    IoError,
    NumericError,
    PowerSpectrum,
    RunConfig,
    RunStats,
    Score,
    ScoreState,
    SpectralParams,
    SweepModel,
    SweepPoint,
    SweepResult,
    TempoTracker,
    TraceEntry,
    TransitionProbs,
    ViterbiResult,
    Wave,
    apply_sustain,
    build_covariance,
    clamp_noise_sigma,
    dump_score,
    envelope_weight,
    estimate_weights,
    expected_frames_static,
    extract_harmonic_peaks,
    fit_envelope,
    fit_inharmonicity,
    fixed_transition_probs,
    format_datagram,
    full_viterbi,
    hann_power_spectrum,
    inharmonic_factor,
    kernel_value,
    lml_cholesky,
    lml_direct,
    lml_sweep,
    load_params_file,
    load_score_dump,
    make_cholesky,
    make_score,
    midi_to_freq,
    parse_midi,
    parse_midi_bytes,
    parse_params_text,
    read_trace,
    read_wav,
    run_follow,
    sample_gp,
    slice_samples,
    spectral_density,
    transition_probs,
    write_trace,
    write_wav,
)

__all__ = [
    "Audioframe",
    "CholeskyFactor",
    "ConfigError",
    "Decoder",
    "DecoderConfig",
    "EnvelopeFit",
    "FrameSpec",
    "HarmonicPeak",
    "HumSettings",
    "InharmonicityFit",
    "IoError",
    "NumericError",
    "PowerSpectrum",
    "RunConfig",
    "RunStats",
    "Score",
    "ScoreState",
    "SpectralParams",
    "SweepModel",
    "SweepPoint",
    "SweepResult",
    "TempoTracker",
    "TraceEntry",
    "TransitionProbs",
    "ViterbiResult",
    "Wave",
    "apply_sustain",
    "build_covariance",
    "clamp_noise_sigma",
    "dump_score",
    "envelope_weight",
    "estimate_weights",
    "expected_frames_static",
    "extract_harmonic_peaks",
    "fit_envelope",
    "fit_inharmonicity",
    "fixed_transition_probs",
    "format_datagram",
    "full_viterbi",
    "hann_power_spectrum",
    "inharmonic_factor",
    "kernel_value",
    "lml_cholesky",
    "lml_direct",
    "lml_sweep",
    "load_params_file",
    "load_score_dump",
    "make_cholesky",
    "make_score",
    "midi_to_freq",
    "parse_midi",
    "parse_midi_bytes",
    "parse_params_text",
    "read_trace",
    "read_wav",
    "run_follow",
    "sample_gp",
    "slice_samples",
    "spectral_density",
    "transition_probs",
    "write_trace",
    "write_wav",
]

__version__ = "0.1.0"
