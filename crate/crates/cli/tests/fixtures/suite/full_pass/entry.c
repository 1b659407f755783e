int callPopcount() {
  int result = popcount(11);
  if (result == 3) {
    return 0;
  }
  return 1;
}
