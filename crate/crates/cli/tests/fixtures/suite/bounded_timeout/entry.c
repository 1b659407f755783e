int callProduct() {
  unsigned result = product(7, 6);
  if (result == 42) {
    return 0;
  }
  return 1;
}
