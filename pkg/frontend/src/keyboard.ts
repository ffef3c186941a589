/** Single-key shortcuts that stay out of the way of form fields. */

export type KeyHandlers = Record<string, () => void>;

/** Install `handlers` keyed by `KeyboardEvent.key` on `target`.
 *
 * Presses inside inputs, selects, textareas and contenteditable
 * elements are ignored, as are chords with ctrl/meta/alt.  Returns a
 * function that removes the listener.
 */
export function bindKeys(target: EventTarget, handlers: KeyHandlers): () => void {
  const listener = (event: Event) => {
    const e = event as KeyboardEvent;
    const el = e.target as HTMLElement | null;
    const tag = el?.tagName;
    if (tag === "INPUT" || tag === "SELECT" || tag === "TEXTAREA") {
      return;
    }
    if (el?.isContentEditable) {
      return;
    }
    if (e.metaKey || e.ctrlKey || e.altKey) {
      return;
    }
    const handler = handlers[e.key];
    if (handler !== undefined) {
      e.preventDefault();
      handler();
    }
  };
  target.addEventListener("keydown", listener);
  return () => target.removeEventListener("keydown", listener);
}
