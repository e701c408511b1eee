function (a) { return a; }