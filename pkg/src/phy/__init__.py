from src.phy.constellation import (
    QamConstellation,
    bits_to_symbols,
    decide,
    make_constellation,
    symbols_to_bits,
)
from src.phy.channel import (
    CEPoint,
    Channel,
    RealChannel,
    SymbolBlock,
    complex_noise,
    is_constant_envelope,
    lift,
    load_channel_csv,
    rayleigh_channel,
    receive,
    save_channel_csv,
    stack_real,
    unstack_real,
)

__all__ = [
    "QamConstellation", "make_constellation", "decide", "symbols_to_bits", "bits_to_symbols",
    "Channel", "RealChannel", "SymbolBlock", "CEPoint",
    "lift", "rayleigh_channel", "receive", "complex_noise", "is_constant_envelope",
    "stack_real", "unstack_real", "save_channel_csv", "load_channel_csv",
]
