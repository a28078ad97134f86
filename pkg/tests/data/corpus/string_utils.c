static int str_count_char(const char *s, char c)
{
    int n = 0;

    while (*s) {
        if (*s == c)
            n++;
        s++;
    }
    return n;
}

static int str_to_int(const char *s, int *out)
{
    int value = 0;
    int sign = 1;

    if (*s == '-') {
        sign = -1;
        s++;
    }
    while (*s >= '0' && *s <= '9') {
        value = value * 10 + (*s - '0');
        s++;
    }
    if (*s != '\0')
        return -1;
    *out = value * sign;
    return 0;
}

static void str_reverse(char *s, int len)
{
    int i = 0;
    int j = len - 1;
    char tmp;

    while (i < j) {
        tmp = s[i];
        s[i] = s[j];
        s[j] = tmp;
        i++;
        j--;
    }
}

static int str_prefix(const char *s, const char *prefix)
{
    while (*prefix) {
        if (*s != *prefix)
            return 0;
        s++;
        prefix++;
    }
    return 1;
}
