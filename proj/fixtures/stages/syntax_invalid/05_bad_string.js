"unterminated