int callReverse() {
  int result = reverse(123);

  if (result == 321) {
    return 0;
  } else {
    return 1;
  }
}
