static int gcd(int a, int b)
{
    int t;

    while (b != 0) {
        t = b;
        b = a % b;
        a = t;
    }
    return a;
}

static int ipow(int base, int exp)
{
    int result = 1;

    while (exp > 0) {
        if (exp & 1)
            result = result * base;
        base = base * base;
        exp = exp >> 1;
    }
    return result;
}

static int clamp_range(int value, int lo, int hi)
{
    if (value < lo)
        return lo;
    if (value > hi)
        return hi;
    return value;
}

static int checksum16(const unsigned char *data, int len)
{
    int sum = 0;
    int i;

    for (i = 0; i < len; i++) {
        sum += data[i];
        sum = (sum & 0xffff) + (sum >> 16);
    }
    return sum;
}
