function f(n) { return n * 2; } print(f(21));