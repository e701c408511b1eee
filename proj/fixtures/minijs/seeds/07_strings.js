var s = "Hello, World"; // greeting
print(s.toUpperCase(), s.indexOf("o"), s.slice(1, 4), s.split(",").length);
