return 1;