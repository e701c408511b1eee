var n = 0.1 + 0.2; print(n, 1 / 0, -0, 0x10);