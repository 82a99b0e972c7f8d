/** Monotonic request tokens: a response is applied only when its token is
 * still the newest one issued, so a slow earlier response can never
 * overwrite the result of a later submit. */
export class RequestGate {
  private seq = 0;

  begin(): number {
    this.seq += 1;
    return this.seq;
  }

  isCurrent(token: number): boolean {
    return token === this.seq;
  }
}
