// Latest-wins gate: at most one analytical request's rendering survives.
// A newer run invalidates older tokens, so a slow stale response can never
// paint over fresher results.

export class LatestWins {
  private token = 0;

  begin(): number {
    return ++this.token;
  }

  isCurrent(token: number): boolean {
    return token === this.token;
  }
}
