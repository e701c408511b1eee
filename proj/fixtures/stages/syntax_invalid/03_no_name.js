var = 3;