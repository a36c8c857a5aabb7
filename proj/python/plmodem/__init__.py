"""Power-line covert channel modem: framing, M-FSK modulation, channel
simulation, non-coherent reception, and BER analysis."""

from ._core import (  # noqa: F401
    BerReport,
    ChannelProfile,
    DemodResult,
    EnergyMatrix,
    Frame,
    ModemError,
    ModulationPlan,
    PlanOptions,
    SpectrumData,
    SymbolStream,
    SyncEstimate,
    Waveform,
    acquire_sync,
    add_noise,
    affinity_supported,
    apply_channel,
    attenuate,
    bandwidth,
    ber_trial,
    bit_rate,
    bits_from_hex,
    bits_to_symbols,
    carrier_energy,
    crc8,
    decode_frame,
    demodulate,
    encode_frame,
    hex_from_bits,
    packetize,
    plan_bfsk,
    plan_mfsk,
    psd,
    read_wav,
    recover_frames,
    spectrogram,
    symbols_to_bits,
    synthesize_waveform,
    write_wav,
)

__all__ = [name for name in dir() if not name.startswith("_")]
