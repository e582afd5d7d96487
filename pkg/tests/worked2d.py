"""The two-dimensional example stream: 40 packets over IPv4 pairs."""

A, B, C, D = 10, 11, 12, 13
W, X, Y, Z = 20, 21, 22, 23


def ip(*octets):
    a, b, c, d = octets
    return a << 24 | b << 16 | c << 8 | d


def worked_stream():
    out = [(ip(A, B, C, D), ip(W, X, Y, Z))] * 10
    for i in range(10):
        out.append((ip(A, B, C, i), ip(W, X, Y, i)))
        out.append((ip(A, B, i, D), ip(W, X, Y, i)))
        out.append((ip(A, B, C, i), ip(W, i, Y, Z)))
    return out


# exact HHHs at phi*N = 10 with their conditioned counts, by hand:
# the heavy pair itself, then one family of ten singletons per prefix
WORKED_EXACT = {
    "(10.11.12.13,20.21.22.23)": 10,
    "(10.11.12.*,20.21.22.*)": 10,
    "(10.11.*.*,20.21.22.*)": 10,
    "(10.11.12.*,20.*.*.*)": 10,
}
