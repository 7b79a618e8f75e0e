import { ApiClient } from "./api";
import { render } from "./render";
import { Store } from "./state";

export interface AppOptions {
  /** Version-poll interval in ms; 0 disables polling (tests). */
  pollMs?: number;
}

export interface AppHandle {
  store: Store;
  stop(): void;
}

export function initApp(
  root: HTMLElement,
  api: ApiClient,
  options: AppOptions = {},
): AppHandle {
  const store = new Store(api);
  store.subscribe(() => render(root, store));
  render(root, store);
  void store.load();

  const pollMs = options.pollMs ?? 4000;
  let timer: ReturnType<typeof setInterval> | null = null;
  if (pollMs > 0) {
    timer = setInterval(() => void store.checkServerVersion(), pollMs);
  }
  return {
    store,
    stop() {
      if (timer !== null) {
        clearInterval(timer);
      }
    },
  };
}

// boot only when served as the real page; tests mount their own root
const rootElement = typeof document !== "undefined" ? document.getElementById("app") : null;
if (rootElement) {
  initApp(rootElement, new ApiClient(""));
}
