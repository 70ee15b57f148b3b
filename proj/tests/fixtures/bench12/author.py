"""Writes benchmark.jsonl and responses.json for the 12-problem offline benchmark.

Pool design per problem (N=8): a correct plurality, a shorter buggy minority, and the
occasional unparseable or empty sample. Problems 02-06 carry a probe input on which every
candidate raises, so output-pattern majority voting has nothing to vote on. Problem 10 has
no correct candidate at all.
"""
import json
import os

HERE = os.path.dirname(os.path.abspath(__file__))

FROM_TYPING = "from typing import List\n\n\n"


def fn(sig, doc, body):
    """Full function text as a model might return it, fenced."""
    return "```python\n" + sig + "\n    \"\"\"" + doc + "\"\"\"\n" + body + "```\n"


P = []


def problem(task, entry, prompt, tests, samples, greedy, sketches, variations, direct):
    assert len(samples) == 8
    assert len(sketches) == 3 and len(variations) == 3 and len(direct) == 6
    # Draw order varies across problems so the first valid sample is not always the buggy one.
    if len(P) % 2 == 0:
        samples = samples[1:] + samples[:1]
    P.append(dict(task=task, entry=entry, prompt=prompt, tests=tests, samples=samples, greedy=greedy,
                  sketches=sketches, variations=variations, direct=direct))


# 00: range-bound off-by-one that only n = 2p separates.
problem(
    "fx/00_divisors", "divisors",
    FROM_TYPING + "def divisors(n: int) -> List[int]:\n"
    "    \"\"\"Return the divisors of n strictly between 1 and n, in increasing order.\n"
    "    >>> divisors(9)\n    [3]\n    >>> divisors(7)\n    []\n    \"\"\"\n",
    "def check(candidate):\n"
    "    assert candidate(1) == []\n    assert candidate(6) == [2, 3]\n    assert candidate(12) == [2, 3, 4, 6]\n"
    "    assert candidate(9) == [3]\n    assert candidate(13) == []\n    assert candidate(4) == [2]\n",
    [
        "    return [d for d in range(2, n // 2) if n % d == 0]\n",
        "    return [d for d in range(2, n // 2 + 1) if n % d == 0]\n",
        "    result = []\n    for d in range(2, n // 2 + 1):\n        if n % d == 0:\n            result.append(d)\n    return result\n",
        "    return [k for k in range(2, n // 2) if n % k == 0]\n",
        "    return [k for k in range(2, n // 2 + 1) if n % k == 0]\n",
        fn("def divisors(n: int) -> List[int]:", "Divisors between 1 and n.",
           "    out = []\n    for d in range(2, n // 2 + 1):\n        if n % d == 0:\n            out.append(d)\n    return out\n"),
        "    return [i for i in range(2, n // 2) if not n % i]\n",
        "    return list(filter(lambda d: n % d == 0, range(2, n // 2 + 1)))\n",
    ],
    "    return [d for d in range(2, n // 2) if n % d == 0]\n",
    [("smallest admissible values", "(1,)"), ("twice a prime, where n // 2 divides n", "(6,)"),
     ("primes have no inner divisors", "(3,)")],
    [["(2,)"], ["(10,)"], ["(11,)"]],
    ["(1,)", "(12,)", "(9,)", "(14,)", "(25,)", "(2,)"],
)

# 01: plain plurality, buggy minority drops the last element.
problem(
    "fx/01_running_sum", "running_sum",
    FROM_TYPING + "def running_sum(xs: List[int]) -> List[int]:\n"
    "    \"\"\"Prefix sums of xs.\n    >>> running_sum([1, 2, 3])\n    [1, 3, 6]\n    \"\"\"\n",
    "def check(candidate):\n"
    "    assert candidate([]) == []\n    assert candidate([1, 2, 3]) == [1, 3, 6]\n    assert candidate([-1, 1]) == [-1, 0]\n"
    "    assert candidate([5]) == [5]\n",
    [
        "    out, acc = [], 0\n    for x in xs:\n        acc += x\n        out.append(acc)\n    return out\n",
        "    return [sum(xs[:i + 1]) for i in range(len(xs))]\n",
        "    return [sum(xs[:i]) for i in range(1, len(xs))]\n",
        "    import itertools\n    return list(itertools.accumulate(xs))\n",
        "    total = 0\n    res = []\n    for v in xs:\n        total += v\n        res.append(total)\n    return res\n",
        "    return [sum(xs[:i]) for i in range(1, len(xs))]\n",
        "    return [sum(xs[:i + 1]) for i in range(len(xs))\n",
        "    out, acc = [], 0\n    for y in xs:\n        acc += y\n        out.append(acc)\n    return out\n",
    ],
    "    out, acc = [], 0\n    for x in xs:\n        acc += x\n        out.append(acc)\n    return out\n",
    [("empty list", "([],)"), ("single element", "([4],)"), ("mixed signs", "([3, -2, 5],)")],
    [["([],)"], ["([-7],)"], ["([1, 1, 1, 1],)"]],
    ["([],)", "([1],)", "([1, 2],)", "([0, 0, 0],)", "([-5, 5, -5],)", "([10, 20, 30, 40],)"],
)

# 02: every candidate raises on the empty list.
problem(
    "fx/02_first_max_index", "first_max_index",
    FROM_TYPING + "def first_max_index(xs: List[int]) -> int:\n"
    "    \"\"\"Index of the first occurrence of the maximum of a non-empty list.\n"
    "    >>> first_max_index([1, 3, 2])\n    1\n    \"\"\"\n",
    "def check(candidate):\n"
    "    assert candidate([1, 3, 2]) == 1\n    assert candidate([5, 1, 5]) == 0\n    assert candidate([2, 2, 2]) == 0\n"
    "    assert candidate([-1, -3]) == 0\n",
    [
        "    return len(xs) - 1 - xs[::-1].index(max(xs))\n",
        "    return xs.index(max(xs))\n",
        "    m = max(xs)\n    return xs.index(m)\n",
        "    return max(range(len(xs)), key=lambda i: (xs[i], -i))\n",
        "    return len(xs) - 1 - xs[::-1].index(max(xs))\n",
        "    best = max(xs)\n    for i, x in enumerate(xs):\n        if x == best:\n            return i\n",
        "    top = max(xs)\n    return xs.index(top)\n",
        "    return xs.index(max(xs)\n",
    ],
    "    return xs.index(max(xs))\n",
    [("empty list violates the precondition", "([],)"), ("repeated maximum", "([5, 1, 5],)"),
     ("strictly increasing", "([1, 2, 3],)")],
    [["([],)"], ["([0, 0],)"], ["([-3, -2, -1],)"]],
    ["([],)", "([7, 7],)", "([1, 9, 9, 2],)", "([3],)", "([4, 2],)", "([],)"],
)

# 03: mean of an empty list divides by zero everywhere.
problem(
    "fx/03_mean", "mean",
    FROM_TYPING + "def mean(xs: List[int]) -> float:\n"
    "    \"\"\"Arithmetic mean of a non-empty list.\n    >>> mean([1, 2, 3, 4])\n    2.5\n    \"\"\"\n",
    "def check(candidate):\n"
    "    assert candidate([1, 2, 3, 4]) == 2.5\n    assert candidate([3]) == 3\n    assert abs(candidate([1, 2]) - 1.5) < 1e-9\n",
    [
        "    return sum(xs) // len(xs)\n",
        "    return sum(xs) / len(xs)\n",
        "    total = 0\n    for x in xs:\n        total += x\n    return total / len(xs)\n",
        "    return sum(xs) / len(xs)\n",
        "    n = len(xs)\n    return sum(xs) / n\n",
        "    return sum(xs) // len(xs)\n",
        "    return float(sum(xs)) / len(xs)\n",
        "",
    ],
    "    return sum(xs) / len(xs)\n",
    [("empty list", "([],)"), ("odd total over an even count", "([1, 2],)"), ("negative values", "([-3, -4],)")],
    [["([],)"], ["([1, 2, 3, 5],)"], ["([-1],)"]],
    ["([],)", "([1, 2],)", "([2, 4],)", "([5],)", "([1, 1, 2],)", "([-1, -2],)"],
)

# 04: index out of range for every candidate.
problem(
    "fx/04_char_upper", "char_upper",
    "def char_upper(s: str, n: int) -> str:\n"
    "    \"\"\"Return the character at zero-based position n of s, upper-cased.\n"
    "    >>> char_upper('abc', 0)\n    'A'\n    \"\"\"\n",
    "def check(candidate):\n"
    "    assert candidate('abc', 0) == 'A'\n    assert candidate('abc', 2) == 'C'\n    assert candidate('xY', 1) == 'Y'\n",
    [
        "    return s[n - 1].upper()\n",
        "    return s[n].upper()\n",
        "    c = s[n]\n    return c.upper()\n",
        "    return s[n].upper()\n",
        "    return s[n - 1].upper()\n",
        "    return str.upper(s[n])\n",
        "    ch = s[n]\n    return ch.upper()\n",
        "    return s[n].upper()\n",
    ],
    "    return s[n].upper()\n",
    [("position past the end", "('ab', 5)"), ("first character", "('hello', 0)"), ("last character", "('hello', 4)")],
    [["('', 0)"], ["('xyz', 0)"], ["('a1b2', 3)"]],
    ["('abc', 9)", "('abc', 1)", "('q', 0)", "('Mixed', 2)", "('zz', 1)", "('', 1)"],
)

# 05: division by zero everywhere; the minority rounds to the wrong precision.
problem(
    "fx/05_ratio", "ratio",
    "def ratio(a: int, b: int) -> float:\n"
    "    \"\"\"a divided by b, rounded to two decimals.\n    >>> ratio(1, 4)\n    0.25\n    \"\"\"\n",
    "def check(candidate):\n"
    "    assert candidate(1, 4) == 0.25\n    assert candidate(2, 3) == 0.67\n    assert candidate(10, 5) == 2.0\n",
    [
        "    return round(a / b, 1)\n",
        "    return round(a / b, 2)\n",
        "    q = a / b\n    return round(q, 2)\n",
        "    return round(a / b, 2)\n",
        "    return round(a / b, 1)\n",
        "    return round(float(a) / b, 2)\n",
        "    return round(a / b, 2)\n",
        "    result = a / b\n    return round(result, 2)\n",
    ],
    "    return round(a / b, 2)\n",
    [("zero divisor", "(1, 0)"), ("repeating decimal", "(2, 3)"), ("exact quotient", "(10, 5)")],
    [["(0, 0)"], ["(1, 7)"], ["(9, 3)"]],
    ["(5, 0)", "(1, 3)", "(2, 7)", "(8, 2)", "(1, 8)", "(3, 0)"],
)

# 06: median of the empty list fails everywhere; minority forgets to average.
problem(
    "fx/06_median", "median",
    FROM_TYPING + "def median(xs: List[int]) -> float:\n"
    "    \"\"\"Median of a non-empty list.\n    >>> median([3, 1, 2])\n    2\n    \"\"\"\n",
    "def check(candidate):\n"
    "    assert candidate([3, 1, 2]) == 2\n    assert candidate([1, 2, 3, 4]) == 2.5\n    assert candidate([5]) == 5\n",
    [
        "    s = sorted(xs)\n    return s[len(s) // 2]\n",
        "    s = sorted(xs)\n    n = len(s)\n    m = n // 2\n    return s[m] if n % 2 else (s[m - 1] + s[m]) / 2\n",
        "    ys = sorted(xs)\n    n = len(ys)\n    m = n // 2\n    return ys[m] if n % 2 else (ys[m - 1] + ys[m]) / 2\n",
        "    s = sorted(xs)\n    return s[len(s) // 2]\n",
        "    s = sorted(xs)\n    n = len(s)\n    if n % 2:\n        return s[n // 2]\n    return (s[n // 2 - 1] + s[n // 2]) / 2\n",
        "    s = sorted(xs)\n    n = len(s)\n    mid = n // 2\n    return s[mid] if n % 2 == 1 else (s[mid - 1] + s[mid]) / 2\n",
        "    s = sorted(xs)\n    return s[len(s) // 2]\n",
        "    s = sorted(xs)\n    k = len(s) // 2\n    return s[k] if len(s) % 2 else (s[k - 1] + s[k]) / 2\n",
    ],
    "    s = sorted(xs)\n    return s[len(s) // 2]\n",
    [("empty list", "([],)"), ("even length", "([1, 2, 3, 4],)"), ("odd length", "([9, 1, 5],)")],
    [["([],)"], ["([4, 8],)"], ["([7],)"]],
    ["([],)", "([1, 2],)", "([3, 1, 2],)", "([10, 20, 30, 40],)", "([5],)", "([2, 2, 4, 4],)"],
)

# 07: case-sensitive minority.
problem(
    "fx/07_is_palindrome", "is_palindrome",
    "def is_palindrome(s: str) -> bool:\n"
    "    \"\"\"True if s reads the same backwards, ignoring case.\n    >>> is_palindrome('aba')\n    True\n    \"\"\"\n",
    "def check(candidate):\n"
    "    assert candidate('aba') is True\n    assert candidate('Aba') is True\n    assert candidate('ab') is False\n"
    "    assert candidate('') is True\n",
    [
        "    return s == s[::-1]\n",
        "    t = s.lower()\n    return t == t[::-1]\n",
        "    return s.lower() == s.lower()[::-1]\n",
        "    t = s.casefold()\n    return t == t[::-1]\n",
        "    return s == s[::-1]\n",
        "    low = s.lower()\n    return low == low[::-1]\n",
        "    u = s.lower()\n    return u == u[::-1]\n",
        "    return s == ''.join(reversed(s))\n",
    ],
    "    return s == s[::-1]\n",
    [("mixed case palindrome", "('Abba',)"), ("plain palindrome", "('racecar',)"), ("not a palindrome", "('abc',)")],
    [["('Noon',)"], ["('',)"], ["('ab',)"]],
    ["('Level',)", "('abc',)", "('a',)", "('RaceCar',)", "('xyz',)", "('',)"],
)

# 08: lowercase-only vowel counting in the minority.
problem(
    "fx/08_count_vowels", "count_vowels",
    "def count_vowels(s: str) -> int:\n"
    "    \"\"\"Number of vowels (a, e, i, o, u in either case) in s.\n    >>> count_vowels('hello')\n    2\n    \"\"\"\n",
    "def check(candidate):\n"
    "    assert candidate('hello') == 2\n    assert candidate('HELLO') == 2\n    assert candidate('') == 0\n"
    "    assert candidate('xyz') == 0\n",
    [
        "    return sum(c in 'aeiou' for c in s)\n",
        "    return sum(1 for c in s.lower() if c in 'aeiou')\n",
        "    return sum(c in 'aeiouAEIOU' for c in s)\n",
        "    n = 0\n    for c in s.lower():\n        if c in 'aeiou':\n            n += 1\n    return n\n",
        "    return len([c for c in s.lower() if c in 'aeiou'])\n",
        "    return sum(ch in 'aeiou' for ch in s)\n",
        "    count = 0\n    for ch in s:\n        if ch.lower() in 'aeiou':\n            count += 1\n    return count\n",
        "    return sum(1 for ch in s.lower() if ch in 'aeiou')\n",
    ],
    "    return sum(1 for c in s.lower() if c in 'aeiou')\n",
    [("upper-case vowels", "('AEIOU',)"), ("no vowels", "('rhythm',)"), ("mixed text", "('Hello World',)")],
    [["('ApPlE',)"], ["('',)"], ["('queue',)"]],
    ["('HELLO',)", "('sky',)", "('aAaA',)", "('',)", "('Education',)", "('bcd',)"],
)

# 09: reverse words; minority reverses characters.
problem(
    "fx/09_reverse_words", "reverse_words",
    "def reverse_words(s: str) -> str:\n"
    "    \"\"\"Reverse the order of space-separated words.\n    >>> reverse_words('a b')\n    'b a'\n    \"\"\"\n",
    "def check(candidate):\n"
    "    assert candidate('a b') == 'b a'\n    assert candidate('one two three') == 'three two one'\n"
    "    assert candidate('x') == 'x'\n",
    [
        "    return s[::-1]\n",
        "    return ' '.join(s.split()[::-1])\n",
        "    return ' '.join(reversed(s.split()))\n",
        "    words = s.split()\n    words.reverse()\n    return ' '.join(words)\n",
        "    return s[::-1]\n",
        "    parts = s.split()\n    return ' '.join(parts[::-1])\n",
        "    return ' '.join(s.split()[::-1])\n",
        "    return ' '.join(w for w in reversed(s.split()))\n",
    ],
    "    return ' '.join(s.split()[::-1])\n",
    [("multi-letter words", "('hello world',)"), ("single word", "('abc',)"), ("three words", "('x y z',)")],
    [["('ab cd',)"], ["('',)"], ["('one two three',)"]],
    ["('ab cd',)", "('single',)", "('a b c d',)", "('',)", "('hi there',)", "('x',)"],
)

# 10: every candidate ignores the distinctness requirement.
problem(
    "fx/10_second_largest", "second_largest",
    FROM_TYPING + "def second_largest(xs: List[int]) -> int:\n"
    "    \"\"\"Second largest distinct value in xs (at least two distinct values).\n"
    "    >>> second_largest([1, 3, 2])\n    2\n    \"\"\"\n",
    "def check(candidate):\n"
    "    assert candidate([1, 3, 2]) == 2\n    assert candidate([5, 5, 4]) == 4\n    assert candidate([2, 1, 2]) == 1\n",
    [
        "    return sorted(xs)[-2]\n",
        "    s = sorted(xs)\n    return s[-2]\n",
        "    return sorted(xs, reverse=True)[1]\n",
        "    ys = sorted(xs)\n    return ys[len(ys) - 2]\n",
        "    return sorted(xs)[-2]\n",
        "    t = sorted(xs)\n    return t[-2]\n",
        "    return sorted(xs)[1]\n",
        "    s = sorted(xs)\n    return s[-2]\n",
    ],
    "    return sorted(xs)[-2]\n",
    [("distinct values", "([1, 3, 2],)"), ("negative values", "([-1, -5, -3],)"), ("two elements", "([4, 9],)")],
    [["([10, 20, 30],)"], ["([-2, -1],)"], ["([1, 2],)"]],
    ["([1, 2, 3],)", "([9, 4],)", "([-1, 0, 1],)", "([7, 3, 5],)", "([100, 50],)", "([2, 8, 6],)"],
)

# 11: fizzbuzz branch order.
problem(
    "fx/11_fizzbuzz", "fizzbuzz",
    "def fizzbuzz(n: int) -> str:\n"
    "    \"\"\"'Fizz' for multiples of 3, 'Buzz' for multiples of 5, 'FizzBuzz' for both, else str(n).\n"
    "    >>> fizzbuzz(3)\n    'Fizz'\n    >>> fizzbuzz(5)\n    'Buzz'\n    \"\"\"\n",
    "def check(candidate):\n"
    "    assert candidate(3) == 'Fizz'\n    assert candidate(5) == 'Buzz'\n    assert candidate(15) == 'FizzBuzz'\n"
    "    assert candidate(7) == '7'\n",
    [
        "    if n % 3 == 0:\n        return 'Fizz'\n    if n % 5 == 0:\n        return 'Buzz'\n    if n % 15 == 0:\n        return 'FizzBuzz'\n    return str(n)\n",
        "    if n % 15 == 0:\n        return 'FizzBuzz'\n    if n % 3 == 0:\n        return 'Fizz'\n    if n % 5 == 0:\n        return 'Buzz'\n    return str(n)\n",
        "    out = ''\n    if n % 3 == 0:\n        out += 'Fizz'\n    if n % 5 == 0:\n        out += 'Buzz'\n    return out or str(n)\n",
        "    return 'Fizz' * (n % 3 == 0) + 'Buzz' * (n % 5 == 0) or str(n)\n",
        "    if n % 3 == 0:\n        return 'Fizz'\n    if n % 5 == 0:\n        return 'Buzz'\n    if n % 15 == 0:\n        return 'FizzBuzz'\n    return str(n)\n",
        "    if n % 15 == 0:\n        return 'FizzBuzz'\n    elif n % 3 == 0:\n        return 'Fizz'\n    elif n % 5 == 0:\n        return 'Buzz'\n    return str(n)\n",
        "    s = ''\n    if n % 3 == 0:\n        s += 'Fizz'\n    if n % 5 == 0:\n        s += 'Buzz'\n    return s or str(n)\n",
        "    return str(n)\n",
    ],
    "    if n % 15 == 0:\n        return 'FizzBuzz'\n    if n % 3 == 0:\n        return 'Fizz'\n    if n % 5 == 0:\n        return 'Buzz'\n    return str(n)\n",
    [("multiple of fifteen", "(30,)"), ("multiple of three only", "(9,)"), ("neither", "(7,)")],
    [["(15,)"], ["(6,)"], ["(1,)"]],
    ["(45,)", "(3,)", "(10,)", "(8,)", "(60,)", "(2,)"],
)


def main():
    with open(os.path.join(HERE, "benchmark.jsonl"), "w") as f:
        for p in P:
            ex = []
            f.write(json.dumps({"task_id": p["task"], "prompt": p["prompt"], "entry_point": p["entry"],
                                "example_inputs": ex, "ground_truth_tests": p["tests"]}) + "\n")
    responses = {}
    for p in P:
        responses[p["task"]] = {
            "samples": p["samples"],
            "greedy": p["greedy"],
            "sketches": [{"description": d, "input_expr": e} for d, e in p["sketches"]],
            "variations": p["variations"],
            "direct": p["direct"],
        }
    with open(os.path.join(HERE, "responses.json"), "w") as f:
        json.dump({"k": 3, "m": 2, "problems": responses}, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
