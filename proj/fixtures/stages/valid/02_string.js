var s = "abc"; print(s.length, s.charAt(1));