int callClamp() {
  int result = clamp(150, 0, 100);
  if (result == 100) {
    return 0;
  }
  return 1;
}
