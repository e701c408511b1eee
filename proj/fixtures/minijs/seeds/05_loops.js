var total = 0;
for (var i = 0; i < 10; i = i + 1) { if (i % 3 == 0) continue; total = total + i; }
while (total > 20) { total = total - 7; }
print(total);
