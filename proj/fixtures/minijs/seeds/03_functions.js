function fib(n) { if (n < 2) return n; return fib(n - 1) + fib(n - 2); }
var a = [1, 2, 3];
a.push(fib(7));
print(a.join(","), a.length);
