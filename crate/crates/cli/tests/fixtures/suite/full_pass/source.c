int popcount(unsigned x) {
  int count = 0;
  while (x != 0) {
    count += x % 2;
    x = x / 2;
  }
  return count;
}
