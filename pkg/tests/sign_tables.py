# Coefficients of p_1 .. p_16 as printed for each support pattern of a 4-qubit
# word (1 = non-identity position), transcribed by hand.
PRINTED = {
    "1111": "+--+-++--++-+--+",
    "0111": "+--+-++-+--+-++-",
    "1011": "+--++--+-++--++-",
    "1101": "+-+--+-+-+-++-+-",
    "1110": "++----++--++++--",
    "0011": "+--++--++--++--+",
    "0101": "+-+--+-++-+--+-+",
    "0110": "++----++++----++",
    "1001": "+-+-+-+--+-+-+-+",
    "1010": "++--++----++--++",
    "1100": "++++--------++++",
    "1000": "++++++++--------",
    "0100": "++++----++++----",
    "0010": "++--++--++--++--",
    "0001": "+-+-+-+-+-+-+-+-",
}
