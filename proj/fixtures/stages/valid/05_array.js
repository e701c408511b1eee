var a = [3, 1, 2]; a.push(4); print(a.join(","));