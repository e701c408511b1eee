var r = /b+/g; print("abbbc".replace(r, "-"));